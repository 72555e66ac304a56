//! Two-direction causal study over a range of lag orders, with the pruning
//! rule that treats bidirectional rejections as possible confounding.

use serde::Serialize;

use crate::aggregation::{qppa_fixed, reject};
use crate::dh::{dh_block_bootstrap, dh_statistics};
use crate::error::Result;
use crate::float::Float;
use crate::granger::{granger_panel, Direction, ErrorPolicy, Panel};
use crate::pipeline::harness::TestMethod;
use crate::seeding::derive_seed;

/// Direction verdict after pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Only the forward direction rejects.
    XToY,
    /// Only the reverse direction rejects.
    YToX,
    /// Both directions reject: possibly confounded, so neither is claimed.
    BothAmbiguous,
    /// Neither direction rejects.
    NoDirection,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::XToY => write!(f, "x->y"),
            Verdict::YToX => write!(f, "y->x"),
            Verdict::BothAmbiguous => write!(f, "both (ambiguous)"),
            Verdict::NoDirection => write!(f, "none"),
        }
    }
}

/// One (lag order, method) row of the study.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionalRow {
    pub lag_order: usize,
    pub method: TestMethod,
    pub p_forward: f64,
    pub p_reverse: f64,
    pub verdict: Verdict,
}

/// Study output across lag orders and methods.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionalStudyResult {
    pub alpha: f64,
    pub gamma: f64,
    pub rows: Vec<DirectionalRow>,
}

impl DirectionalStudyResult {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>4} {:>8} {:>10} {:>10}  verdict\n",
            "P", "method", "p(x->y)", "p(y->x)"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:>4} {:>8} {:>10.3} {:>10.3}  {}\n",
                row.lag_order,
                row.method.to_string(),
                row.p_forward,
                row.p_reverse,
                row.verdict
            ));
        }
        out
    }
}

impl std::fmt::Display for DirectionalStudyResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_table())
    }
}

fn verdict(forward: bool, reverse: bool) -> Verdict {
    match (forward, reverse) {
        (true, true) => Verdict::BothAmbiguous,
        (true, false) => Verdict::XToY,
        (false, true) => Verdict::YToX,
        (false, false) => Verdict::NoDirection,
    }
}

/// Tests both directions for every lag order and method and applies the
/// pruning rule at `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn directional_study<F: Float>(
    panel: &Panel<F>,
    lag_orders: &[usize],
    methods: &[TestMethod],
    alpha: f64,
    gamma: f64,
    breps: usize,
    block_size: usize,
    seed: u64,
    policy: ErrorPolicy,
) -> Result<DirectionalStudyResult> {
    let alpha_f = F::cast(alpha);
    let gamma_f = F::cast(gamma);
    let mut rows = Vec::new();
    for (pi, &p) in lag_orders.iter().enumerate() {
        for (mi, &method) in methods.iter().enumerate() {
            let mut p_dir = [0.0_f64; 2];
            for (di, direction) in [Direction::XToY, Direction::YToX].into_iter().enumerate() {
                let p_value: F = match method {
                    TestMethod::Qppa => {
                        let outcome = granger_panel(panel, p, direction, policy)?;
                        qppa_fixed(&outcome.p_values(), gamma_f)?.p_value
                    }
                    TestMethod::Dh => dh_statistics(panel, p, direction)?.p_semi,
                    TestMethod::DhBb => {
                        let s = derive_seed(seed, &[pi as u64, mi as u64, di as u64]);
                        dh_block_bootstrap(panel, p, direction, breps, block_size, s)?.p_value
                    }
                };
                p_dir[di] = num_traits::ToPrimitive::to_f64(&p_value).unwrap_or(f64::NAN);
            }
            let fwd = reject(F::cast(p_dir[0]), alpha_f)?;
            let rev = reject(F::cast(p_dir[1]), alpha_f)?;
            rows.push(DirectionalRow {
                lag_order: p,
                method,
                p_forward: p_dir[0],
                p_reverse: p_dir[1],
                verdict: verdict(fwd, rev),
            });
        }
    }
    Ok(DirectionalStudyResult { alpha, gamma, rows })
}
