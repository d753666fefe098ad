use serde::Serialize;

use crate::consensus::ConsensusResult;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    Dpm,
    Dla,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dpm => "DPM",
            Algorithm::Dla => "DLA",
        }
    }
}

/// Consensus usage of one run, in the units of the complexity table:
/// one unit is one scalar sent to one neighbor.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct MessageAudit {
    pub ac_n_calls: u64,
    pub ac_1_calls: u64,
    pub units_per_node: Vec<u64>,
    /// Sequential consensus rounds.
    pub time_periods: u64,
}

impl MessageAudit {
    pub fn new(nodes: usize) -> Self {
        Self {
            units_per_node: vec![0; nodes],
            ..Self::default()
        }
    }

    pub(crate) fn record(&mut self, res: &ConsensusResult, vector: bool) {
        if vector {
            self.ac_n_calls += 1;
        } else {
            self.ac_1_calls += 1;
        }
        self.time_periods += 1;
        for (u, s) in self.units_per_node.iter_mut().zip(&res.scalars_exchanged_per_node) {
            *u += s;
        }
    }
}

/// Closed-form counters for `M` iterations, `N` samples and `I` consensus
/// iterations per call:
///
/// | | AC_N | AC_1 | units per node | periods |
/// |-----|------|------|------------------|---------|
/// | DPM | M+1  | 1    | I(MN + N + 1)·d  | M+2     |
/// | DLA | M    | M    | I(MN + M)·d      | 2M      |
pub fn expected_audit(alg: Algorithm, m: u64, n: u64, i: u64, degrees: &[usize]) -> MessageAudit {
    let (ac_n, ac_1, per_degree, periods) = match alg {
        Algorithm::Dpm => (m + 1, 1, i * (m * n + n + 1), m + 2),
        Algorithm::Dla => (m, m, i * (m * n + m), 2 * m),
    };
    MessageAudit {
        ac_n_calls: ac_n,
        ac_1_calls: ac_1,
        units_per_node: degrees.iter().map(|&d| per_degree * d as u64).collect(),
        time_periods: periods,
    }
}

/// Compares a run's counters with [`expected_audit`]; the error names the
/// first differing counter.
pub fn audit_messages(
    alg: Algorithm,
    measured: &MessageAudit,
    m: u64,
    n: u64,
    i: u64,
    degrees: &[usize],
) -> Result<MessageAudit> {
    let want = expected_audit(alg, m, n, i, degrees);
    let mismatch = |what: &str, got: u64, exp: u64| {
        Err(Error::Audit(format!("{} {what}: measured {got}, expected {exp}", alg.name())))
    };
    if measured.ac_n_calls != want.ac_n_calls {
        return mismatch("AC_N calls", measured.ac_n_calls, want.ac_n_calls);
    }
    if measured.ac_1_calls != want.ac_1_calls {
        return mismatch("AC_1 calls", measured.ac_1_calls, want.ac_1_calls);
    }
    if measured.time_periods != want.time_periods {
        return mismatch("time periods", measured.time_periods, want.time_periods);
    }
    if measured.units_per_node.len() != want.units_per_node.len() {
        return Err(Error::Audit("node count differs".into()));
    }
    for (k, (g, e)) in measured.units_per_node.iter().zip(&want.units_per_node).enumerate() {
        if g != e {
            return mismatch(&format!("units at node {k}"), *g, *e);
        }
    }
    Ok(want)
}
