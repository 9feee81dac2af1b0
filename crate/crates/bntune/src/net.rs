//! Data model for discrete Bayesian networks with exact rational CPTs.
//!
//! A [`Network`] couples a DAG over named discrete variables with one
//! conditional distribution per (variable, parent configuration). Networks are
//! immutable once built; parameter changes go through
//! [`set_parameter_with_covariation`] / [`apply_assignment`], which return new
//! networks and keep every CPT row summing to exactly 1.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

/// A discrete variable: a name plus the ordered list of its values.
///
/// Value order is canonical: it fixes CPT column order, row-major row order
/// for children, and tie-breaking for modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Variable {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// Identifies a single CPT entry `Pr(value | parent_config)` of a variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ParameterRef {
    pub variable: String,
    pub value: String,
    /// Parent variable name -> parent value name; empty for root variables.
    pub parent_config: BTreeMap<String, String>,
}

impl ParameterRef {
    /// Reference into the prior of a root variable.
    pub fn root(variable: impl Into<String>, value: impl Into<String>) -> Self {
        ParameterRef {
            variable: variable.into(),
            value: value.into(),
            parent_config: BTreeMap::new(),
        }
    }

    pub fn new(
        variable: impl Into<String>,
        value: impl Into<String>,
        parent_config: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
    ) -> Self {
        ParameterRef {
            variable: variable.into(),
            value: value.into(),
            parent_config: parent_config
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    /// Resolve to internal indices, checking the reference exists.
    pub fn resolve(&self, net: &Network) -> Result<ResolvedParam, NetError> {
        let var = net
            .var_index(&self.variable)
            .ok_or_else(|| NetError::UnknownVariable(self.variable.clone()))?;
        let val = net.variables[var]
            .value_index(&self.value)
            .ok_or_else(|| NetError::UnknownValue(self.variable.clone(), self.value.clone()))?;
        let parents = net.parents(var);
        if self.parent_config.len() != parents.len() {
            return Err(NetError::ParentConfigMismatch(self.variable.clone()));
        }
        let mut parent_values = Vec::with_capacity(parents.len());
        for &p in parents {
            let pname = &net.variables[p].name;
            let chosen = self
                .parent_config
                .get(pname)
                .ok_or_else(|| NetError::ParentConfigMismatch(self.variable.clone()))?;
            let idx = net.variables[p]
                .value_index(chosen)
                .ok_or_else(|| NetError::UnknownValue(pname.clone(), chosen.clone()))?;
            parent_values.push(idx);
        }
        let row = net.row_index(var, &parent_values);
        Ok(ResolvedParam { var, row, val })
    }
}

impl fmt::Display for ParameterRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.variable, self.value)?;
        if !self.parent_config.is_empty() {
            let cfg: Vec<String> = self
                .parent_config
                .iter()
                .map(|(k, v)| format!("{}={}", k, v))
                .collect();
            write!(f, "|{}", cfg.join(","))?;
        }
        Ok(())
    }
}

/// Internal coordinates of a CPT entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolvedParam {
    pub var: usize,
    pub row: usize,
    pub val: usize,
}

/// A joint value for a set of parameters, at most one per distribution.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParameterAssignment {
    entries: BTreeMap<ParameterRef, Rational>,
}

impl ParameterAssignment {
    pub fn empty() -> Self {
        ParameterAssignment::default()
    }

    pub fn new(entries: impl IntoIterator<Item = (ParameterRef, Rational)>) -> Self {
        ParameterAssignment {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, p: ParameterRef, x: Rational) {
        self.entries.insert(p, x);
    }

    pub fn get(&self, p: &ParameterRef) -> Option<&Rational> {
        self.entries.get(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParameterRef, &Rational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parameter refs in canonical (sorted) order.
    pub fn refs(&self) -> impl Iterator<Item = &ParameterRef> {
        self.entries.keys()
    }
}

impl fmt::Display for ParameterAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(p, x)| format!("{}:{}", p, format_rational(x)))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// An instantiation of a set of variables, each to one of its values.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Evidence {
    entries: BTreeMap<String, String>,
}

impl Evidence {
    pub fn empty() -> Self {
        Evidence::default()
    }

    /// Build from pairs; a variable listed twice is an error.
    pub fn new(
        pairs: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
    ) -> Result<Self, NetError> {
        let mut entries = BTreeMap::new();
        for (k, v) in pairs {
            let k = k.into();
            if entries.insert(k.clone(), v.into()).is_some() {
                return Err(NetError::DuplicateEvidence(k));
            }
        }
        Ok(Evidence { entries })
    }

    pub fn get(&self, variable: &str) -> Option<&String> {
        self.entries.get(variable)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Union of two instantiations; overlapping variables are an error.
    pub fn union(&self, other: &Evidence) -> Result<Evidence, NetError> {
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            if entries.insert(k.clone(), v.clone()).is_some() {
                return Err(NetError::DuplicateEvidence(k.clone()));
            }
        }
        Ok(Evidence { entries })
    }

    /// Resolve to `(variable index, value index)` pairs sorted by variable.
    pub fn resolve(&self, net: &Network) -> Result<Vec<(usize, usize)>, NetError> {
        let mut out = Vec::with_capacity(self.entries.len());
        for (var, val) in &self.entries {
            let v = net
                .var_index(var)
                .ok_or_else(|| NetError::UnknownVariable(var.clone()))?;
            let i = net.variables[v]
                .value_index(val)
                .ok_or_else(|| NetError::UnknownValue(var.clone(), val.clone()))?;
            out.push((v, i));
        }
        out.sort_unstable();
        Ok(out)
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(k, v)| format!("{}={}", k, v))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown value `{1}` for variable `{0}`")]
    UnknownValue(String, String),
    #[error("parent configuration does not match the parents of `{0}`")]
    ParentConfigMismatch(String),
    #[error("variable `{0}` instantiated twice")]
    DuplicateEvidence(String),
    #[error("parameter value {0} outside [0, 1]")]
    OutOfRange(String),
    #[error("two parameters address the same distribution of `{0}`")]
    DuplicateDistribution(String),
    #[error("duplicate variable `{0}` in network")]
    DuplicateVariableDecl(String),
    #[error("duplicate parent `{0}` in cpt declaration")]
    DuplicateParentDecl(String),
    #[error("cpt redeclared for variable `{0}`")]
    DuplicateCpt(String),
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
}

/// One structural or numeric invariant violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooFewValues { variable: String },
    DuplicateValueName { variable: String, value: String },
    Cycle { variables: Vec<String> },
    MissingRows { variable: String, expected: usize, found: usize },
    ExtraRows { variable: String, expected: usize, found: usize },
    RowLength { variable: String, row: usize, expected: usize, found: usize },
    EntryOutOfRange { variable: String, row: usize, value: String, entry: Rational },
    RowSum { variable: String, row: usize, sum: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewValues { variable } => {
                write!(f, "variable {} has fewer than 2 values", variable)
            }
            Violation::DuplicateValueName { variable, value } => {
                write!(f, "variable {} repeats value name {}", variable, value)
            }
            Violation::Cycle { variables } => write!(f, "cycle {}", variables.join(",")),
            Violation::MissingRows { variable, expected, found } => write!(
                f,
                "cpt for {} is missing rows: expected {}, found {}",
                variable, expected, found
            ),
            Violation::ExtraRows { variable, expected, found } => write!(
                f,
                "cpt for {} has extra rows: expected {}, found {}",
                variable, expected, found
            ),
            Violation::RowLength { variable, row, expected, found } => write!(
                f,
                "cpt row {} for {} has {} entries, expected {}",
                row, variable, found, expected
            ),
            Violation::EntryOutOfRange { variable, row, value, entry } => write!(
                f,
                "cpt row {} for {} entry {} = {} outside [0, 1]",
                row,
                variable,
                value,
                format_rational(entry)
            ),
            Violation::RowSum { variable, row, sum } => write!(
                f,
                "cpt row {} for {}: row sums to {}",
                row,
                variable,
                format_rational(sum)
            ),
        }
    }
}

/// Every violated invariant of a network; empty iff the network is valid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("; "))
    }
}

/// Discrete Bayesian network with exact rational CPTs.
///
/// A network is constructed through [`NetworkBuilder`] (or the text format)
/// and may be structurally complete yet numerically invalid; [`Network::validate`]
/// reports all violations instead of failing fast so that callers can surface
/// every problem at once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    name: String,
    variables: Vec<Variable>,
    parents: Vec<Vec<usize>>,
    /// cpts[var][row][value]; row index is row-major over parent value indices
    /// in declared parent order (last parent varies fastest).
    cpts: Vec<Vec<Vec<Rational>>>,
    index: BTreeMap<String, usize>,
}

impl Network {
    pub fn builder(name: impl Into<String>) -> NetworkBuilder {
        NetworkBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: usize) -> &Variable {
        &self.variables[var]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    /// All arcs as (parent, child) index pairs, in child-then-parent order.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut arcs = Vec::new();
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                arcs.push((p, child));
            }
        }
        arcs
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.variables[var].values.len()
    }

    /// Number of parent configurations (rows) the variable's CPT must have.
    pub fn expected_rows(&self, var: usize) -> usize {
        self.parents[var]
            .iter()
            .map(|&p| self.cardinality(p))
            .product()
    }

    pub fn rows(&self, var: usize) -> &[Vec<Rational>] {
        &self.cpts[var]
    }

    /// Row-major row index for the given parent value indices.
    pub fn row_index(&self, var: usize, parent_values: &[usize]) -> usize {
        debug_assert_eq!(parent_values.len(), self.parents[var].len());
        let mut idx = 0;
        for (&p, &v) in self.parents[var].iter().zip(parent_values) {
            idx = idx * self.cardinality(p) + v;
        }
        idx
    }

    /// Inverse of [`Network::row_index`].
    pub fn row_parent_values(&self, var: usize, row: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents[var].len()];
        let mut rem = row;
        for i in (0..self.parents[var].len()).rev() {
            let card = self.cardinality(self.parents[var][i]);
            out[i] = rem % card;
            rem /= card;
        }
        out
    }

    pub fn entry(&self, var: usize, row: usize, val: usize) -> &Rational {
        &self.cpts[var][row][val]
    }

    /// Human-readable parent configuration of a row, for diagnostics.
    pub fn describe_row(&self, var: usize, row: usize) -> String {
        let pv = self.row_parent_values(var, row);
        self.parents[var]
            .iter()
            .zip(pv)
            .map(|(&p, v)| format!("{}={}", self.variables[p].name, self.variables[p].values[v]))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Variables in topological order, or `None` if the arcs contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        for ps in &self.parents {
            for _ in ps.iter() {}
        }
        for (child, ps) in self.parents.iter().enumerate() {
            indegree[child] = ps.len();
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        ready.sort_unstable_by(|a, b| b.cmp(a));
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    // keep deterministic: smallest index first
                    let pos = ready.binary_search_by(|x| c.cmp(x)).unwrap_or_else(|e| e);
                    ready.insert(pos, c);
                }
            }
        }
        if order.len() == n {
            Some(order)
        } else {
            None
        }
    }

    /// Check every network invariant and report all violations.
    pub fn validate(&self) -> ValidationReport {
        validate_network(self)
    }

    fn find_cycle(&self) -> Vec<String> {
        // DFS from the smallest-index node on a cycle; report the cycle path.
        let n = self.variables.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(
            v: usize,
            children: &[Vec<usize>],
            state: &mut Vec<u8>,
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            state[v] = 1;
            stack.push(v);
            for &c in &children[v] {
                if state[c] == 1 {
                    let start = stack.iter().position(|&x| x == c).unwrap();
                    return Some(stack[start..].to_vec());
                }
                if state[c] == 0 {
                    if let Some(cycle) = dfs(c, children, state, stack) {
                        return Some(cycle);
                    }
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }
        for v in 0..n {
            if state[v] == 0 {
                if let Some(cycle) = dfs(v, &children, &mut state, &mut stack) {
                    return cycle
                        .into_iter()
                        .map(|i| self.variables[i].name.clone())
                        .collect();
                }
            }
        }
        Vec::new()
    }
}

/// List every violated invariant of `net`; the report is empty iff `net` is valid.
pub fn validate_network(net: &Network) -> ValidationReport {
    let mut violations = Vec::new();
    for var in &net.variables {
        if var.values.len() < 2 {
            violations.push(Violation::TooFewValues {
                variable: var.name.clone(),
            });
        }
        for (i, v) in var.values.iter().enumerate() {
            if var.values[..i].contains(v) {
                violations.push(Violation::DuplicateValueName {
                    variable: var.name.clone(),
                    value: v.clone(),
                });
            }
        }
    }
    if net.topological_order().is_none() {
        violations.push(Violation::Cycle {
            variables: net.find_cycle(),
        });
    }
    for v in 0..net.variables.len() {
        let expected_rows = net.expected_rows(v);
        let found = net.cpts[v].len();
        if found < expected_rows {
            violations.push(Violation::MissingRows {
                variable: net.variables[v].name.clone(),
                expected: expected_rows,
                found,
            });
        } else if found > expected_rows {
            violations.push(Violation::ExtraRows {
                variable: net.variables[v].name.clone(),
                expected: expected_rows,
                found,
            });
        }
        let card = net.cardinality(v);
        for (r, row) in net.cpts[v].iter().enumerate() {
            if row.len() != card {
                violations.push(Violation::RowLength {
                    variable: net.variables[v].name.clone(),
                    row: r,
                    expected: card,
                    found: row.len(),
                });
                continue;
            }
            let mut sum = Rational::zero();
            for (i, entry) in row.iter().enumerate() {
                if entry < &Rational::zero() || entry > &Rational::one() {
                    violations.push(Violation::EntryOutOfRange {
                        variable: net.variables[v].name.clone(),
                        row: r,
                        value: net.variables[v].values[i].clone(),
                        entry: entry.clone(),
                    });
                }
                sum += entry;
            }
            if !sum.is_one() {
                violations.push(Violation::RowSum {
                    variable: net.variables[v].name.clone(),
                    row: r,
                    sum,
                });
            }
        }
    }
    ValidationReport { violations }
}

/// True iff the underlying undirected graph of a valid network is acyclic.
pub fn is_polytree(net: &Network) -> Result<bool, NetError> {
    let report = net.validate();
    if !report.is_valid() {
        return Err(NetError::Invalid(report));
    }
    // union-find over undirected arcs
    let n = net.variables().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in net.arcs() {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra == rb {
            return Ok(false);
        }
        parent[ra] = rb;
    }
    Ok(true)
}

/// Result of a covariation update: the new network plus the parameters whose
/// sibling mass had to be redistributed uniformly (varied entry originally 1
/// with three or more values, where the proportional formula divides by zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovariationResult {
    pub network: Network,
    pub uniform_fallback: Vec<ParameterRef>,
}

/// Set one CPT entry to `x`, co-varying its siblings proportionally.
///
/// Sibling entries are rescaled by `(1 - x) / (1 - old)` so their mutual
/// ratios are preserved and the row still sums to exactly 1. If the varied
/// entry was originally 1 the freed mass `1 - x` is spread uniformly over the
/// siblings (for binary variables this coincides with the complement rule).
pub fn set_parameter_with_covariation(
    net: &Network,
    p: &ParameterRef,
    x: &Rational,
) -> Result<CovariationResult, NetError> {
    if x < &Rational::zero() || x > &Rational::one() {
        return Err(NetError::OutOfRange(format_rational(x)));
    }
    let rp = p.resolve(net)?;
    let mut network = net.clone();
    let fallback = covary_row(&mut network.cpts[rp.var][rp.row], rp.val, x);
    let uniform_fallback = if fallback { vec![p.clone()] } else { Vec::new() };
    Ok(CovariationResult {
        network,
        uniform_fallback,
    })
}

/// In-place proportional covariation of one row; returns true when the
/// uniform-redistribution fallback fired.
fn covary_row(row: &mut [Rational], val: usize, x: &Rational) -> bool {
    let old = row[val].clone();
    let one = Rational::one();
    let mut fallback = false;
    if old == one {
        // all siblings are 0; spread 1 - x uniformly
        let siblings = row.len() - 1;
        let share = (&one - x) / Rational::from_integer(num::BigInt::from(siblings as i64));
        for (i, entry) in row.iter_mut().enumerate() {
            if i != val {
                *entry = share.clone();
            }
        }
        fallback = row.len() >= 3 && x != &one;
    } else {
        let scale = (&one - x) / (&one - &old);
        for (i, entry) in row.iter_mut().enumerate() {
            if i != val {
                *entry = &*entry * &scale;
            }
        }
    }
    row[val] = x.clone();
    debug_assert!(row.iter().sum::<Rational>().is_one());
    fallback
}

/// Apply a joint parameter assignment, one covariation per distribution.
///
/// Distributions touched by distinct parameters are disjoint, so the result
/// is independent of application order. Two refs addressing the same
/// distribution are rejected.
pub fn apply_assignment(
    net: &Network,
    assignment: &ParameterAssignment,
) -> Result<CovariationResult, NetError> {
    let mut seen: Vec<(usize, usize)> = Vec::with_capacity(assignment.len());
    let mut resolved = Vec::with_capacity(assignment.len());
    for (p, x) in assignment.iter() {
        if x < &Rational::zero() || x > &Rational::one() {
            return Err(NetError::OutOfRange(format_rational(x)));
        }
        let rp = p.resolve(net)?;
        if seen.contains(&(rp.var, rp.row)) {
            return Err(NetError::DuplicateDistribution(p.variable.clone()));
        }
        seen.push((rp.var, rp.row));
        resolved.push((p.clone(), rp, x.clone()));
    }
    let mut network = net.clone();
    let mut uniform_fallback = Vec::new();
    for (p, rp, x) in resolved {
        if covary_row(&mut network.cpts[rp.var][rp.row], rp.val, &x) {
            uniform_fallback.push(p);
        }
    }
    Ok(CovariationResult {
        network,
        uniform_fallback,
    })
}

/// Incremental constructor for [`Network`].
///
/// Structural mistakes that would make the network unrepresentable (unknown
/// names, duplicate declarations) fail here; numeric and shape problems are
/// left for [`validate_network`] to report.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    name: String,
    variables: Vec<Variable>,
    parents: Vec<Vec<usize>>,
    cpts: Vec<Vec<Vec<Rational>>>,
    cpt_declared: Vec<bool>,
    index: BTreeMap<String, usize>,
}

impl NetworkBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetworkBuilder {
            name: name.into(),
            variables: Vec::new(),
            parents: Vec::new(),
            cpts: Vec::new(),
            cpt_declared: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    pub fn variable(
        mut self,
        name: impl Into<String>,
        values: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, NetError> {
        self.add_variable(Variable::new(name, values))?;
        Ok(self)
    }

    pub fn add_variable(&mut self, var: Variable) -> Result<usize, NetError> {
        if self.index.contains_key(&var.name) {
            return Err(NetError::DuplicateVariableDecl(var.name));
        }
        let idx = self.variables.len();
        self.index.insert(var.name.clone(), idx);
        self.variables.push(var);
        self.parents.push(Vec::new());
        self.cpts.push(Vec::new());
        self.cpt_declared.push(false);
        Ok(idx)
    }

    /// Declare the CPT block for `var`: its ordered parents and rows.
    /// Rows are in row-major order over parent value indices.
    pub fn cpt(
        mut self,
        var: &str,
        parents: &[&str],
        rows: Vec<Vec<Rational>>,
    ) -> Result<Self, NetError> {
        let v = self.declare_cpt(var, parents)?;
        self.cpts[v] = rows;
        Ok(self)
    }

    /// Register a CPT header; rows can then be appended with [`NetworkBuilder::push_row`].
    pub fn declare_cpt(&mut self, var: &str, parents: &[&str]) -> Result<usize, NetError> {
        let v = self
            .index
            .get(var)
            .copied()
            .ok_or_else(|| NetError::UnknownVariable(var.to_string()))?;
        if self.cpt_declared[v] {
            return Err(NetError::DuplicateCpt(var.to_string()));
        }
        let mut ps = Vec::with_capacity(parents.len());
        for &p in parents {
            let pi = self
                .index
                .get(p)
                .copied()
                .ok_or_else(|| NetError::UnknownVariable(p.to_string()))?;
            if ps.contains(&pi) {
                return Err(NetError::DuplicateParentDecl(p.to_string()));
            }
            ps.push(pi);
        }
        self.parents[v] = ps;
        self.cpt_declared[v] = true;
        Ok(v)
    }

    pub fn push_row(&mut self, var: usize, row: Vec<Rational>) {
        self.cpts[var].push(row);
    }

    /// Place a row at an explicit row index (labelled rows in the text format).
    pub fn set_row(&mut self, var: usize, row_idx: usize, row: Vec<Rational>) {
        if self.cpts[var].len() <= row_idx {
            self.cpts[var].resize(row_idx + 1, Vec::new());
        }
        self.cpts[var][row_idx] = row;
    }

    pub fn build(self) -> Network {
        Network {
            name: self.name,
            variables: self.variables,
            parents: self.parents,
            cpts: self.cpts,
            index: self.index,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    /// Two-node chain A -> B with uniform rows.
    fn chain_half() -> Network {
        Network::builder("chain")
            .variable("A", ["a", "na"])
            .unwrap()
            .variable("B", ["b", "nb"])
            .unwrap()
            .cpt("A", &[], vec![vec![rat(1, 2), rat(1, 2)]])
            .unwrap()
            .cpt(
                "B",
                &["A"],
                vec![
                    vec![rat(1, 2), rat(1, 2)],
                    vec![rat(1, 2), rat(1, 2)],
                ],
            )
            .unwrap()
            .build()
    }

    #[test]
    fn valid_chain_has_empty_report() {
        assert!(chain_half().validate().is_valid());
    }

    #[test]
    fn bad_row_sum_reported() {
        let net = Network::builder("bad")
            .variable("A", ["a", "na"])
            .unwrap()
            .cpt("A", &[], vec![vec![rat(1, 2), rat(1, 3)]])
            .unwrap()
            .build();
        let report = net.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("row sums to 5/6"));
    }

    #[test]
    fn two_cycle_reported() {
        let mut b = NetworkBuilder::new("cyclic");
        b.add_variable(Variable::new("A", ["a", "na"])).unwrap();
        b.add_variable(Variable::new("B", ["b", "nb"])).unwrap();
        let a = b.declare_cpt("A", &["B"]).unwrap();
        b.push_row(a, vec![rat(1, 2), rat(1, 2)]);
        b.push_row(a, vec![rat(1, 2), rat(1, 2)]);
        let bb = b.declare_cpt("B", &["A"]).unwrap();
        b.push_row(bb, vec![rat(1, 2), rat(1, 2)]);
        b.push_row(bb, vec![rat(1, 2), rat(1, 2)]);
        let net = b.build();
        let report = net.validate();
        assert!(report.to_string().contains("cycle A,B"));
    }

    #[test]
    fn missing_row_reported() {
        let net = Network::builder("missing")
            .variable("A", ["a", "na"])
            .unwrap()
            .variable("B", ["b", "nb"])
            .unwrap()
            .cpt("A", &[], vec![vec![rat(1, 2), rat(1, 2)]])
            .unwrap()
            .cpt("B", &["A"], vec![vec![rat(1, 2), rat(1, 2)]])
            .unwrap()
            .build();
        let report = net.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MissingRows { .. })));
    }

    #[test]
    fn diamond_is_not_polytree() {
        let net = Network::builder("diamond")
            .variable("A", ["t", "f"])
            .unwrap()
            .variable("B", ["t", "f"])
            .unwrap()
            .variable("C", ["t", "f"])
            .unwrap()
            .variable("D", ["t", "f"])
            .unwrap()
            .cpt("A", &[], vec![vec![rat(1, 2), rat(1, 2)]])
            .unwrap()
            .cpt(
                "B",
                &["A"],
                vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]],
            )
            .unwrap()
            .cpt(
                "C",
                &["A"],
                vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]],
            )
            .unwrap()
            .cpt(
                "D",
                &["B", "C"],
                vec![
                    vec![rat(1, 2), rat(1, 2)],
                    vec![rat(1, 2), rat(1, 2)],
                    vec![rat(1, 2), rat(1, 2)],
                    vec![rat(1, 2), rat(1, 2)],
                ],
            )
            .unwrap()
            .build();
        assert!(!is_polytree(&net).unwrap());
        assert!(is_polytree(&chain_half()).unwrap());
    }

    #[test]
    fn covariation_scales_siblings() {
        let net = Network::builder("tri")
            .variable("T", ["x", "y", "z"])
            .unwrap()
            .cpt("T", &[], vec![vec![rat(1, 2), rat(1, 3), rat(1, 6)]])
            .unwrap()
            .build();
        let p = ParameterRef::root("T", "x");
        let out = set_parameter_with_covariation(&net, &p, &rat(0, 1)).unwrap();
        assert_eq!(out.network.rows(0)[0], vec![rat(0, 1), rat(2, 3), rat(1, 3)]);
        assert!(out.uniform_fallback.is_empty());
    }

    #[test]
    fn covariation_at_original_value_is_identity() {
        let net = Network::builder("tri")
            .variable("T", ["x", "y", "z"])
            .unwrap()
            .cpt("T", &[], vec![vec![rat(1, 2), rat(1, 3), rat(1, 6)]])
            .unwrap()
            .build();
        let p = ParameterRef::root("T", "x");
        let out = set_parameter_with_covariation(&net, &p, &rat(1, 2)).unwrap();
        assert_eq!(out.network, net);
    }

    #[test]
    fn covariation_binary_complement() {
        let net = chain_half();
        let p = ParameterRef::root("A", "a");
        let out = set_parameter_with_covariation(&net, &p, &rat(3, 7)).unwrap();
        assert_eq!(out.network.rows(0)[0], vec![rat(3, 7), rat(4, 7)]);
    }

    #[test]
    fn covariation_mass_one_uniform_fallback() {
        let net = Network::builder("deg")
            .variable("T", ["x", "y", "z"])
            .unwrap()
            .cpt("T", &[], vec![vec![rat(1, 1), rat(0, 1), rat(0, 1)]])
            .unwrap()
            .build();
        let p = ParameterRef::root("T", "x");
        let out = set_parameter_with_covariation(&net, &p, &rat(1, 2)).unwrap();
        assert_eq!(
            out.network.rows(0)[0],
            vec![rat(1, 2), rat(1, 4), rat(1, 4)]
        );
        assert_eq!(out.uniform_fallback, vec![p]);
    }

    #[test]
    fn covariation_rejects_out_of_range() {
        let net = chain_half();
        let p = ParameterRef::root("A", "a");
        assert!(matches!(
            set_parameter_with_covariation(&net, &p, &rat(3, 2)),
            Err(NetError::OutOfRange(_))
        ));
    }

    #[test]
    fn empty_assignment_is_identity() {
        let net = chain_half();
        let out = apply_assignment(&net, &ParameterAssignment::empty()).unwrap();
        assert_eq!(out.network, net);
    }

    #[test]
    fn assignment_rejects_shared_distribution() {
        let net = chain_half();
        let mut a = ParameterAssignment::empty();
        a.insert(ParameterRef::root("A", "a"), rat(1, 3));
        a.insert(ParameterRef::root("A", "na"), rat(1, 3));
        assert!(matches!(
            apply_assignment(&net, &a),
            Err(NetError::DuplicateDistribution(_))
        ));
    }

    #[test]
    fn assignment_is_order_independent() {
        // two parameters in different distributions of the same variable
        let net = Network::builder("two")
            .variable("A", ["a", "na"])
            .unwrap()
            .variable("B", ["b", "nb"])
            .unwrap()
            .cpt("A", &[], vec![vec![rat(2, 5), rat(3, 5)]])
            .unwrap()
            .cpt(
                "B",
                &["A"],
                vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]],
            )
            .unwrap()
            .build();
        let p1 = ParameterRef::new("B", "b", [("A", "a")]);
        let p2 = ParameterRef::new("B", "b", [("A", "na")]);
        let mut fwd = ParameterAssignment::empty();
        fwd.insert(p1.clone(), rat(1, 7));
        fwd.insert(p2.clone(), rat(2, 7));
        let joint = apply_assignment(&net, &fwd).unwrap().network;

        let step1 = set_parameter_with_covariation(&net, &p2, &rat(2, 7))
            .unwrap()
            .network;
        let step2 = set_parameter_with_covariation(&step1, &p1, &rat(1, 7))
            .unwrap()
            .network;
        assert_eq!(joint, step2);
    }

    #[test]
    fn parameter_ref_resolution_errors() {
        let net = chain_half();
        assert!(ParameterRef::root("Z", "a").resolve(&net).is_err());
        assert!(ParameterRef::root("A", "zz").resolve(&net).is_err());
        // B needs a parent config
        assert!(ParameterRef::root("B", "b").resolve(&net).is_err());
        assert!(ParameterRef::new("B", "b", [("A", "a")]).resolve(&net).is_ok());
    }
}
